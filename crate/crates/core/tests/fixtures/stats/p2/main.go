package main

import (
	"fmt"

	"example.com/fast"
)

func main() {
	fmt.Println(fast.Len("p2"))
}
