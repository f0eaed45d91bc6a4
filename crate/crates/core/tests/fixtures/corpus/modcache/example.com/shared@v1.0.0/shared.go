package shared

import (
	"unsafe"

	"example.com/leaf"
)

func Zero() int {
	x := leaf.Value()
	return int(uintptr(unsafe.Pointer(&x)) & 0)
}
