package immune

// unsafe.Pointer appears only in comments and string literals here.
var s = "unsafe.Pointer"

/* uintptr reflect.SliceHeader unsafe.Sizeof(x) */
var r = `unsafe.Pointer(&x)`

func Describe() string {
	return s + r + "uintptr"
}
